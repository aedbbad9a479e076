//! The five weighted-sum identities, written once over a generic scalar so
//! they can be evaluated both in `f64` and exactly in rational arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::IdentityTag;

pub trait Scalar:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn of(v: f64) -> Self;
    fn approx(&self) -> f64;
}

impl Scalar for f64 {
    fn of(v: f64) -> Self {
        v
    }

    fn approx(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn of(v: f64) -> Self {
        BigRational::from_float(v).expect("finite atom")
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn k<T: Scalar>(v: f64) -> T {
    T::of(v)
}

fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() - y.clone())
        .collect()
}

fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + y.clone())
        .collect()
}

fn scale<T: Scalar>(s: &T, a: &[T]) -> Vec<T> {
    a.iter().map(|x| s.clone() * x.clone()).collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(k(0.0), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn nsq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

/// Parameters of one identity instance. `p` is the free parameter (`γ`, `β`
/// or `√(μ̃/L)`); `rho` is used only by the shifted-potential identity.
#[derive(Clone, Debug)]
pub struct Params<T> {
    pub mu: T,
    pub l: T,
    pub p: T,
    pub rho: T,
}

impl Params<f64> {
    pub fn to<T: Scalar>(&self) -> Params<T> {
        Params {
            mu: k(self.mu),
            l: k(self.l),
            p: k(self.p),
            rho: k(self.rho),
        }
    }
}

/// Vector atoms and scalar atoms; the last scalar is `f*`.
#[derive(Clone, Debug)]
pub struct Atoms<T> {
    pub vectors: Vec<Vec<T>>,
    pub scalars: Vec<T>,
}

impl Atoms<f64> {
    pub fn to<T: Scalar>(&self) -> Atoms<T> {
        Atoms {
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|&x| k(x)).collect())
                .collect(),
            scalars: self.scalars.iter().map(|&x| k(x)).collect(),
        }
    }
}

/// Number of vector and scalar atoms per identity.
pub fn layout(tag: IdentityTag) -> (usize, usize) {
    match tag {
        IdentityTag::VariantIDistance => (3, 2),
        IdentityTag::VariantIIGap => (4, 3),
        IdentityTag::RobustMomentum => (6, 4),
        IdentityTag::AdaptiveMomentum => (4, 4),
        IdentityTag::ShiftedPotential => (5, 4),
    }
}

fn weight<T: Scalar>(p: &Params<T>) -> T {
    p.mu.clone() * p.l.clone() / (k::<T>(2.0) * (p.l.clone() - p.mu.clone()))
}

// f(x) − f(y) + gxᵀ(y − x) + ‖gx − gy‖²/(2L) + c‖x − y − (gx − gy)/L‖²
#[allow(clippy::too_many_arguments)]
fn interp<T: Scalar>(l: &T, c: &T, x: &[T], fx: &T, gx: &[T], y: &[T], fy: &T, gy: &[T]) -> T {
    let dg = sub(gx, gy);
    let shifted = sub(&sub(x, y), &scale(&(k::<T>(1.0) / l.clone()), &dg));
    fx.clone() - fy.clone()
        + dot(gx, &sub(y, x))
        + nsq(&dg) / (k::<T>(2.0) * l.clone())
        + c.clone() * nsq(&shifted)
}

fn convex<T: Scalar>(x: &[T], fx: &T, gx: &[T], y: &[T], fy: &T) -> T {
    fx.clone() - fy.clone() + dot(gx, &sub(y, x))
}

/// `(γL − 1)(1 − γμ)/(γ(L + μ) − 1)`.
fn rho_distance<T: Scalar>(p: &Params<T>) -> T {
    let (g, l, mu) = (p.p.clone(), p.l.clone(), p.mu.clone());
    (g.clone() * l.clone() - k(1.0)) * (k::<T>(1.0) - g.clone() * mu.clone())
        / (g * (l + mu) - k(1.0))
}

/// `(Lγ − 1)(Lγ(3 − γ(L + μ)) − 1)`.
fn rho_gap<T: Scalar>(p: &Params<T>) -> T {
    let (g, l, mu) = (p.p.clone(), p.l.clone(), p.mu.clone());
    let lg = l.clone() * g.clone();
    (lg.clone() - k(1.0)) * (lg * (k::<T>(3.0) - g * (l + mu)) - k(1.0))
}

/// Inequality multipliers, in the order the inequalities enter the sum.
pub fn multipliers<T: Scalar>(tag: IdentityTag, p: &Params<T>) -> Vec<T> {
    let one = || k::<T>(1.0);
    let two = || k::<T>(2.0);
    let (mu, l, q) = (p.mu.clone(), p.l.clone(), p.p.clone());
    match tag {
        IdentityTag::VariantIDistance => {
            let d = q.clone() * (l.clone() + mu.clone()) - one();
            vec![
                two() * q.clone() * (q.clone() * l.clone() - one()) / d.clone(),
                two() * q.clone() * (one() - q.clone() * mu.clone()) / d.clone(),
                q.clone() * (two() - q * (l + mu)) / d,
            ]
        }
        IdentityTag::VariantIIGap => vec![
            q.clone() * mu.clone() * (l.clone() * q.clone() - one()),
            q.clone() * mu.clone(),
            one() - q.clone() * mu.clone(),
            q.clone() / two() * ((l + mu) * q - two()),
        ],
        IdentityTag::RobustMomentum => {
            let rho = one() - mu / l;
            vec![rho.clone(), one() - rho.clone(), rho]
        }
        IdentityTag::AdaptiveMomentum => {
            let mt = l * q.clone() * q.clone();
            let rho = one() / (one() + q.clone() * q);
            vec![rho.clone(), rho.clone(), (one() - rho) / (two() * mt)]
        }
        IdentityTag::ShiftedPotential => vec![one(), one() - p.rho.clone(), p.rho.clone()],
    }
}

/// Required-nonnegative quantities: the inequality multipliers and the
/// coefficients of the residual terms.
pub fn sign_conditions(tag: IdentityTag, p: &Params<f64>) -> Vec<f64> {
    let lam = multipliers::<f64>(tag, p);
    let (mu, l, q) = (p.mu, p.l, p.p);
    match tag {
        IdentityTag::VariantIDistance => lam[..2].to_vec(),
        IdentityTag::VariantIIGap => lam[..3].to_vec(),
        IdentityTag::RobustMomentum => {
            let rho = 1.0 - mu / l;
            let mut v = lam;
            v.extend([(1.0 - q * q) * rho / (2.0 * l), rho / (2.0 * (l - mu))]);
            v
        }
        IdentityTag::AdaptiveMomentum => {
            let mut v = lam;
            v.push(adaptive_coefficient(l, q));
            v
        }
        IdentityTag::ShiftedPotential => {
            let (rho, beta) = (p.rho, q);
            let mut v = lam;
            v.extend([
                1.0 / (2.0 * (l - mu)),
                (1.0 - rho) / (2.0 * l),
                l * (rho.powi(3) - beta * beta) / (2.0 * rho),
                shifted_tail_coefficient(p),
            ]);
            v
        }
    }
}

/// `(4L²s − L(μ̃ − 2μ̃s) − μ̃²)/(2L²(L + μ̃)(s + 1)²)` with `μ̃ = Ls²`.
fn adaptive_coefficient<T: Scalar>(l: T, s: T) -> T {
    let one = || k::<T>(1.0);
    let mt = l.clone() * s.clone() * s.clone();
    let num = k::<T>(4.0) * l.clone() * l.clone() * s.clone()
        - l.clone() * (mt.clone() - k::<T>(2.0) * mt.clone() * s.clone())
        - mt.clone() * mt.clone();
    let sp = s + one();
    num / (k::<T>(2.0) * l.clone() * l.clone() * (l + mt) * sp.clone() * sp)
}

/// `κρ(2βρ − β(β + 2) + ρ) + (ρ − 1)(β − ρ)²`.
pub fn shifted_p3<T: Scalar>(kappa: T, beta: T, rho: T) -> T {
    let b = beta;
    let r = rho;
    kappa
        * r.clone()
        * (k::<T>(2.0) * b.clone() * r.clone() - b.clone() * (b.clone() + k(2.0)) + r.clone())
        + (r.clone() - k(1.0)) * (b.clone() - r.clone()) * (b - r)
}

fn shifted_tail_coefficient<T: Scalar>(p: &Params<T>) -> T {
    let (mu, l, b, r) = (p.mu.clone(), p.l.clone(), p.p.clone(), p.rho.clone());
    let kappa = mu.clone() / l.clone();
    let r3 = r.clone() * r.clone() * r.clone();
    l.clone() * l.clone() * (k::<T>(1.0) - r.clone()) * shifted_p3(kappa, b.clone(), r)
        / (k::<T>(2.0) * (r3 - b.clone() * b) * (l - mu))
}

/// Left-hand side (weighted sum of inequalities) and right-hand side
/// (potential difference plus residual terms) of the identity.
pub fn sides<T: Scalar>(tag: IdentityTag, p: &Params<T>, lam: &[T], a: &Atoms<T>) -> (T, T) {
    let v = &a.vectors;
    let s = &a.scalars;
    let n = v[0].len();
    let zero = vec![k::<T>(0.0); n];
    let one = || k::<T>(1.0);
    let two = || k::<T>(2.0);
    let (mu, l) = (p.mu.clone(), p.l.clone());
    let c = weight(p);
    let fs = s[s.len() - 1].clone();
    match tag {
        IdentityTag::VariantIDistance => {
            let (x, xs, g) = (&v[0], &v[1], &v[2]);
            let f = &s[0];
            let gamma = p.p.clone();
            let i1 = interp(&l, &c, x, f, g, xs, &fs, &zero);
            let i2 = interp(&l, &c, xs, &fs, &zero, x, f, g);
            let eq = two() * (f.clone() - fs.clone()) - gamma.clone() * nsq(g);
            let lhs = lam[0].clone() * i1 + lam[1].clone() * i2 + lam[2].clone() * eq;
            let x1 = sub(x, &scale(&gamma, g));
            let rhs = nsq(&sub(&x1, xs)) - rho_distance(p) * nsq(&sub(x, xs));
            (lhs, rhs)
        }
        IdentityTag::VariantIIGap => {
            let (x, xs, g, g1) = (&v[0], &v[1], &v[2], &v[3]);
            let (f, f1) = (&s[0], &s[1]);
            let gamma = p.p.clone();
            let x1 = sub(x, &scale(&gamma, g));
            let i1 = interp(&l, &c, x, f, g, xs, &fs, &zero);
            let i2 = interp(&l, &c, &x1, f1, g1, xs, &fs, &zero);
            let i3 = interp(&l, &c, &x1, f1, g1, x, f, g);
            let eq = (two() * l.clone() * l.clone() * gamma.clone() - k::<T>(4.0) * l.clone())
                * (f.clone() - fs.clone())
                + nsq(g);
            let lhs = lam[0].clone() * i1
                + lam[1].clone() * i2
                + lam[2].clone() * i3
                + lam[3].clone() * eq;
            let tail = add(
                &sub(
                    g1,
                    &scale(&(l.clone() * mu.clone() * gamma.clone()), &sub(x, xs)),
                ),
                &scale(&(gamma * (l.clone() + mu.clone()) - one()), g),
            );
            let rhs = f1.clone() - fs.clone() - rho_gap(p) * (f.clone() - fs)
                + nsq(&tail) / (two() * (l - mu));
            (lhs, rhs)
        }
        IdentityTag::RobustMomentum => {
            let (x, y, xs, gx, gy, gp) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
            let (fx, fy, fp) = (&s[0], &s[1], &s[2]);
            let beta = p.p.clone();
            let rho = one() - mu.clone() / l.clone();
            let yp = sub(x, &scale(&(one() / l.clone()), gx));
            let xp = add(&yp, &scale(&beta, &sub(&yp, y)));
            let i1 = interp(&l, &c, x, fx, gx, y, fy, gy);
            let i2 = interp(&l, &c, &yp, fp, gp, xs, &fs, &zero);
            let i3 = interp(&l, &c, &yp, fp, gp, x, fx, gx);
            let lhs = lam[0].clone() * i1 + lam[1].clone() * i2 + lam[2].clone() * i3;
            let pot = |a: &[T], b: &[T], fb: &T| {
                (l.clone() - mu.clone()) / two() * nsq(&sub(a, b)) + fb.clone() - fs.clone()
            };
            let lm = l.clone() - mu.clone();
            let r1 = add(
                &scale(&(one() - rho.clone()), &sub(gx, &scale(&l, &sub(x, xs)))),
                gp,
            );
            let r2 = add(&sub(gy, gx), &scale(&mu, &sub(x, y)));
            let r3 = add(gx, &scale(&l, &sub(y, x)));
            let rhs = pot(&xp, &yp, fp) - rho.clone() * pot(x, y, fy)
                + nsq(&r1) / (two() * lm.clone())
                + rho.clone() / (two() * lm) * nsq(&r2)
                + (one() - beta.clone() * beta) * rho / (two() * l.clone()) * nsq(&r3);
            (lhs, rhs)
        }
        IdentityTag::AdaptiveMomentum => {
            let (x, y, gx, gp) = (&v[0], &v[1], &v[2], &v[3]);
            let (fx, fy, fp) = (&s[0], &s[1], &s[2]);
            let q = p.p.clone();
            let mt = l.clone() * q.clone() * q.clone();
            let beta = (one() - q.clone()) / (one() + q.clone());
            let rho = one() / (one() + q.clone() * q.clone());
            let yp = sub(x, &scale(&(one() / l.clone()), gx));
            let xp = add(&yp, &scale(&beta, &sub(&yp, y)));
            let t1 = fp.clone() - fx.clone()
                + dot(gp, &sub(x, &yp))
                + nsq(&sub(gx, gp)) / (two() * l.clone());
            let t2 = convex(x, fx, gx, y, fy);
            let t3 = two() * mt * (fp.clone() - fs.clone()) - nsq(gp);
            let lhs = lam[0].clone() * t1 + lam[1].clone() * t2 + lam[2].clone() * t3;
            let pot = |a: &[T], b: &[T], fb: &T| {
                l.clone() / two() * nsq(&sub(a, b)) + fb.clone() - fs.clone()
            };
            let r = add(gx, &scale(&l, &sub(y, x)));
            let rhs = pot(&xp, &yp, fp) - rho * pot(x, y, fy)
                + adaptive_coefficient(l.clone(), q) * nsq(&r);
            (lhs, rhs)
        }
        IdentityTag::ShiftedPotential => {
            let (x, y, xs, gx, gp) = (&v[0], &v[1], &v[2], &v[3], &v[4]);
            let (fx, fy, fp) = (&s[0], &s[1], &s[2]);
            let (beta, rho) = (p.p.clone(), p.rho.clone());
            let yp = sub(x, &scale(&(one() / l.clone()), gx));
            let xp = add(&yp, &scale(&beta, &sub(&yp, y)));
            let i1 = interp(&l, &c, &yp, fp, gp, x, fx, gx);
            let i2 = interp(&l, &c, x, fx, gx, xs, &fs, &zero);
            let t3 = convex(x, fx, gx, y, fy);
            let lhs = lam[0].clone() * i1 + lam[1].clone() * i2 + lam[2].clone() * t3;
            // L/2‖(a − x*)/√ρ − √ρ(b − x*)‖² expanded to avoid the square root
            let pot = |a: &[T], b: &[T], fb: &T| {
                let (da, db) = (sub(a, xs), sub(b, xs));
                l.clone() / two()
                    * (nsq(&da) / rho.clone() - two() * dot(&da, &db) + rho.clone() * nsq(&db))
                    + fb.clone()
                    - fs.clone()
            };
            let r3 = rho.clone() * rho.clone() * rho.clone();
            let b2 = beta.clone() * beta.clone();
            let ca = (beta.clone() * rho.clone() - beta.clone() * (beta.clone() + one())
                + rho.clone() * rho.clone())
                / (b2.clone() - r3.clone());
            let cb = (b2.clone() - beta.clone() * rho.clone() + beta.clone()
                - rho.clone() * rho.clone())
                / (l.clone() * (b2.clone() - r3.clone()));
            let grouped = add(&add(&sub(y, xs), &scale(&ca, &sub(x, xs))), &scale(&cb, gx));
            let tail = sub(&sub(x, xs), &scale(&(one() / l.clone()), gx));
            let rhs = pot(&xp, &yp, fp) - rho.clone() * pot(x, y, fy)
                + nsq(gp) / (two() * (l.clone() - mu.clone()))
                + (one() - rho.clone()) / (two() * l.clone()) * nsq(gx)
                + l.clone() * (r3 - b2) / (two() * rho.clone()) * nsq(&grouped)
                + shifted_tail_coefficient(p) * nsq(&tail);
            (lhs, rhs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_coefficient_at_full_estimate() {
        // μ̃ = L = 1: s = 1, (4 − (1 − 2) − 1)/(2·2·4) = 1/4
        assert!((adaptive_coefficient(1.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rational_scalar_is_exact() {
        let a = BigRational::of(0.1);
        let b = BigRational::of(0.2);
        let s = a + b;
        assert_ne!(s, BigRational::of(0.3));
        assert!((s.approx() - 0.3).abs() < 1e-16);
    }
}
