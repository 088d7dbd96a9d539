//! The dual motivic Steenrod algebra `A = H**[τ_i, ξ_i]/(τ_i² = ρτ_{i+1} + (τ+ρτ_0)ξ_{i+1})`
//! over a preset, with its Hopf algebroid structure.
//!
//! Elements are `F2`-sparse sets of [`AMonomial`]s: a `k^M` monomial, a power of
//! the left coefficient `τ`, and a pure monomial `τ(E)ξ(R)` with binary `E`.
//! Tensors live in `A ⊗_{H**} A`, normalized so that every coefficient sits in
//! the right factor; the left factor of each term is a pure monomial.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::field_data::{FieldPreset, KmMono};

/// Highest generator index: `τ_0..τ_GEN_CAP` and `ξ_1..ξ_GEN_CAP`.
pub const GEN_CAP: usize = 6;

/// Pure weights below this are unaffected by the generator cap.
pub const CAP_WEIGHT: i32 = (1 << (GEN_CAP + 1)) - 1;

/// Motivic bidegree `(p, q)`: topological degree and weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct Bidegree {
    pub p: i32,
    pub q: i32,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { p: 0, q: 0 };

    pub const fn new(p: i32, q: i32) -> Self {
        Bidegree { p, q }
    }

    pub fn tau_i(i: usize) -> Self {
        Bidegree::new((1 << (i + 1)) - 1, (1 << i) - 1)
    }

    pub fn xi_i(i: usize) -> Self {
        Bidegree::new((1 << (i + 1)) - 2, (1 << i) - 1)
    }

    pub fn tau() -> Self {
        Bidegree::new(0, -1)
    }

    pub fn km(d: u32) -> Self {
        Bidegree::new(-(d as i32), -(d as i32))
    }

    /// The degree of the derivations `d`, which lower bidegree by it.
    pub fn d_shift() -> Self {
        Bidegree::new(2, 1)
    }

    pub fn scale(self, k: i32) -> Self {
        Bidegree::new(self.p * k, self.q * k)
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.p + o.p, self.q + o.q)
    }
}

impl Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.p - o.p, self.q - o.q)
    }
}

impl Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Bidegree {
        Bidegree::new(-self.p, -self.q)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// A pure monomial `τ_0^{E_0}⋯ξ_1^{R_1}⋯` with binary `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct Pure {
    /// Bit `i` is the exponent of `τ_i`.
    e: u8,
    /// `r[i]` is the exponent of `ξ_{i+1}`.
    r: [u8; GEN_CAP],
}

impl Pure {
    pub const ONE: Pure = Pure { e: 0, r: [0; GEN_CAP] };

    pub fn tau(i: usize) -> Pure {
        assert!(i <= GEN_CAP, "generator cap exceeded");
        Pure { e: 1 << i, r: [0; GEN_CAP] }
    }

    pub fn xi(i: usize, exp: u8) -> Pure {
        assert!((1..=GEN_CAP).contains(&i), "generator cap exceeded");
        let mut r = [0; GEN_CAP];
        r[i - 1] = exp;
        Pure { e: 0, r }
    }

    pub fn from_parts(e_bits: u8, r: [u8; GEN_CAP]) -> Pure {
        Pure { e: e_bits, r }
    }

    pub fn e_bits(&self) -> u8 {
        self.e
    }

    pub fn has_tau(&self, i: usize) -> bool {
        self.e >> i & 1 == 1
    }

    /// Exponent of `ξ_i` (`i ≥ 1`).
    pub fn xi_exp(&self, i: usize) -> u8 {
        self.r[i - 1]
    }

    pub fn is_one(&self) -> bool {
        *self == Pure::ONE
    }

    pub fn bidegree(&self) -> Bidegree {
        let mut b = Bidegree::ZERO;
        for i in 0..=GEN_CAP {
            if self.has_tau(i) {
                b = b + Bidegree::tau_i(i);
            }
        }
        for i in 1..=GEN_CAP {
            b = b + Bidegree::xi_i(i).scale(self.r[i - 1] as i32);
        }
        b
    }

    /// Splits off one generator: `(generator, rest)`, or `None` for `1`.
    fn split_first(&self) -> Option<(Pure, Pure)> {
        if self.e != 0 {
            let i = self.e.trailing_zeros() as usize;
            let mut rest = *self;
            rest.e &= !(1 << i);
            return Some((Pure::tau(i), rest));
        }
        let i = self.r.iter().position(|&x| x > 0)?;
        let mut rest = *self;
        rest.r[i] -= 1;
        Some((Pure::xi(i + 1, 1), rest))
    }
}

/// A basis monomial `c · τ^tpow · τ(E)ξ(R)` of `A` as a left `F2`-vector space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AMonomial {
    deg: Bidegree,
    pub c: KmMono,
    pub tpow: u16,
    pub pure: Pure,
}

impl AMonomial {
    pub fn new(c: KmMono, tpow: u16, pure: Pure) -> Self {
        let deg = Bidegree::km(c.degree()) + Bidegree::tau().scale(tpow as i32) + pure.bidegree();
        AMonomial { deg, c, tpow, pure }
    }

    pub fn pure(pure: Pure) -> Self {
        Self::new(KmMono::ONE, 0, pure)
    }

    pub fn bidegree(&self) -> Bidegree {
        self.deg
    }

    pub fn scalar(&self) -> ScalarMono {
        ScalarMono { c: self.c, tpow: self.tpow }
    }
}

/// A monomial `c · τ^tpow` of the coefficient ring `H** = k^M[τ]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScalarMono {
    pub c: KmMono,
    pub tpow: u16,
}

impl ScalarMono {
    pub const ONE: ScalarMono = ScalarMono { c: KmMono::ONE, tpow: 0 };

    pub fn tau_pow(k: u16) -> Self {
        ScalarMono { c: KmMono::ONE, tpow: k }
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::km(self.c.degree()) + Bidegree::tau().scale(self.tpow as i32)
    }
}

/// An element of `H** = k^M[τ]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Scalar(BTreeSet<ScalarMono>);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BTreeSet::new())
    }

    pub fn one() -> Self {
        Self::mono(ScalarMono::ONE)
    }

    pub fn mono(m: ScalarMono) -> Self {
        let mut s = BTreeSet::new();
        s.insert(m);
        Scalar(s)
    }

    pub fn toggle(&mut self, m: ScalarMono) {
        if !self.0.remove(&m) {
            self.0.insert(m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &ScalarMono> {
        self.0.iter()
    }
}

/// An `F2`-linear combination of [`AMonomial`]s in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct AElement(BTreeSet<AMonomial>);

impl AElement {
    pub fn zero() -> Self {
        AElement(BTreeSet::new())
    }

    pub fn one() -> Self {
        Self::from_mono(AMonomial::pure(Pure::ONE))
    }

    pub fn from_mono(m: AMonomial) -> Self {
        let mut s = BTreeSet::new();
        s.insert(m);
        AElement(s)
    }

    pub fn from_pure(p: Pure) -> Self {
        Self::from_mono(AMonomial::pure(p))
    }

    pub fn toggle(&mut self, m: AMonomial) {
        if !self.0.remove(&m) {
            self.0.insert(m);
        }
    }

    pub fn add_assign(&mut self, other: &AElement) {
        for m in &other.0 {
            self.toggle(*m);
        }
    }

    pub fn add(&self, other: &AElement) -> AElement {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &AMonomial> {
        self.0.iter()
    }

    pub fn contains(&self, m: &AMonomial) -> bool {
        self.0.contains(m)
    }

    pub fn bidegrees(&self) -> BTreeSet<Bidegree> {
        self.0.iter().map(|m| m.bidegree()).collect()
    }

    /// The single bidegree of a nonzero homogeneous element.
    pub fn homogeneous_degree(&self) -> Option<Bidegree> {
        let b = self.bidegrees();
        if b.len() == 1 {
            b.into_iter().next()
        } else {
            None
        }
    }

    pub fn component(&self, b: Bidegree) -> AElement {
        AElement(self.0.iter().filter(|m| m.bidegree() == b).copied().collect())
    }
}

impl FromIterator<AMonomial> for AElement {
    fn from_iter<I: IntoIterator<Item = AMonomial>>(iter: I) -> Self {
        let mut out = AElement::zero();
        for m in iter {
            out.toggle(m);
        }
        out
    }
}

/// An element of `A ⊗_{H**} A`: pairs (pure left factor, right monomial).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TensorElement(BTreeSet<(Pure, AMonomial)>);

impl TensorElement {
    pub fn zero() -> Self {
        TensorElement(BTreeSet::new())
    }

    pub fn toggle(&mut self, t: (Pure, AMonomial)) {
        if !self.0.remove(&t) {
            self.0.insert(t);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Pure, AMonomial)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An element of `A ⊗ A ⊗ A`, normalized like [`TensorElement`].
pub type TripleTensor = BTreeSet<(Pure, Pure, AMonomial)>;

/// The two operations dual to `τ_0` and `ξ_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SteenrodOp {
    Sq1,
    Sq2,
}

impl SteenrodOp {
    pub fn dual_monomial(self) -> Pure {
        match self {
            SteenrodOp::Sq1 => Pure::tau(0),
            SteenrodOp::Sq2 => Pure::xi(1, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Unnormalized monomial: `τ_i` exponents may exceed one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Raw {
    c: KmMono,
    tpow: u16,
    e: [u8; GEN_CAP + 1],
    r: [u8; GEN_CAP],
}

impl Raw {
    fn from_mono(m: &AMonomial) -> Raw {
        let mut e = [0; GEN_CAP + 1];
        for (i, x) in e.iter_mut().enumerate() {
            *x = (m.pure.e >> i) & 1;
        }
        Raw { c: m.c, tpow: m.tpow, e, r: m.pure.r }
    }
}

/// A raw monomial accepted by [`DualSteenrod::normal_form`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawMonomial {
    pub c: KmMono,
    pub tpow: u16,
    /// Exponents of `τ_0, τ_1, …` (any natural numbers).
    pub tau_exps: Vec<u32>,
    /// Exponents of `ξ_1, ξ_2, …`.
    pub xi_exps: Vec<u32>,
}

/// The dual Steenrod algebra over one preset, with memo tables.
pub struct DualSteenrod {
    preset: FieldPreset,
    rho: Option<KmMono>,
    coproducts: RefCell<BTreeMap<Pure, Rc<TensorElement>>>,
    conjugates: RefCell<BTreeMap<Pure, Rc<AElement>>>,
    pure_bases: RefCell<BTreeMap<Bidegree, Rc<Vec<Pure>>>>,
    actions: RefCell<BTreeMap<(SteenrodOp, Side, Pure), Rc<AElement>>>,
    eta_r_tau_powers: RefCell<Vec<AElement>>,
}

impl DualSteenrod {
    pub fn new(preset: FieldPreset) -> Self {
        let rho = preset.rho();
        let alg = DualSteenrod {
            preset,
            rho,
            coproducts: RefCell::new(BTreeMap::new()),
            conjugates: RefCell::new(BTreeMap::new()),
            pure_bases: RefCell::new(BTreeMap::new()),
            actions: RefCell::new(BTreeMap::new()),
            eta_r_tau_powers: RefCell::new(alloc::vec![AElement::one()]),
        };
        alg.assert_relations_homogeneous();
        alg
    }

    pub fn preset(&self) -> &FieldPreset {
        &self.preset
    }

    pub fn rho(&self) -> Option<KmMono> {
        self.rho
    }

    fn assert_relations_homogeneous(&self) {
        for i in 0..GEN_CAP {
            let lhs = Bidegree::tau_i(i).scale(2);
            let rho_t = Bidegree::km(1) + Bidegree::tau_i(i + 1);
            let tau_xi = Bidegree::tau() + Bidegree::xi_i(i + 1);
            let rho_t0_xi = Bidegree::km(1) + Bidegree::tau_i(0) + Bidegree::xi_i(i + 1);
            assert!(
                lhs == rho_t && lhs == tau_xi && lhs == rho_t0_xi,
                "defining relation is inhomogeneous at i={i}"
            );
        }
    }

    // ---- element constructors -------------------------------------------------

    pub fn tau_gen(&self, i: usize) -> AElement {
        AElement::from_pure(Pure::tau(i))
    }

    pub fn xi_gen(&self, i: usize) -> AElement {
        AElement::from_pure(Pure::xi(i, 1))
    }

    /// The left coefficient `τ`.
    pub fn tau(&self) -> AElement {
        AElement::from_mono(AMonomial::new(KmMono::ONE, 1, Pure::ONE))
    }

    pub fn rho_elt(&self) -> AElement {
        match self.rho {
            Some(r) => AElement::from_mono(AMonomial::new(r, 0, Pure::ONE)),
            None => AElement::zero(),
        }
    }

    pub fn km_elt(&self, c: KmMono) -> AElement {
        if self.preset.is_nonzero(&c) {
            AElement::from_mono(AMonomial::new(c, 0, Pure::ONE))
        } else {
            AElement::zero()
        }
    }

    pub fn scalar_elt(&self, s: &Scalar) -> AElement {
        s.terms()
            .filter(|m| self.preset.is_nonzero(&m.c))
            .map(|m| AMonomial::new(m.c, m.tpow, Pure::ONE))
            .collect()
    }

    // ---- normal forms and products --------------------------------------------

    fn reduce(&self, mut work: BTreeSet<Raw>) -> AElement {
        let mut out = AElement::zero();
        let toggle = |set: &mut BTreeSet<Raw>, r: Raw| {
            if !set.remove(&r) {
                set.insert(r);
            }
        };
        while let Some(raw) = work.pop_last() {
            match (0..=GEN_CAP).rev().find(|&i| raw.e[i] >= 2) {
                None => {
                    let mut e = 0u8;
                    for i in 0..=GEN_CAP {
                        e |= raw.e[i] << i;
                    }
                    out.toggle(AMonomial::new(raw.c, raw.tpow, Pure { e, r: raw.r }));
                }
                Some(i) => {
                    assert!(i < GEN_CAP, "generator cap exceeded while reducing τ_{i}²");
                    let mut base = raw;
                    base.e[i] -= 2;
                    // τ ξ_{i+1}
                    let mut t = base;
                    t.tpow += 1;
                    t.r[i] = t.r[i].checked_add(1).expect("ξ exponent overflow");
                    toggle(&mut work, t);
                    if let Some(rho) = self.rho {
                        if let Some(c) = self.preset.mono_mul(&base.c, &rho) {
                            // ρ τ_{i+1}
                            let mut t = base;
                            t.c = c;
                            t.e[i + 1] += 1;
                            toggle(&mut work, t);
                            // ρ τ_0 ξ_{i+1}
                            let mut t = base;
                            t.c = c;
                            t.e[0] += 1;
                            t.r[i] += 1;
                            toggle(&mut work, t);
                        }
                    }
                }
            }
        }
        out
    }

    /// Rewrites raw monomials to normal form (binary `τ_i` exponents).
    pub fn normal_form(&self, terms: &[RawMonomial]) -> AElement {
        let mut work = BTreeSet::new();
        for t in terms {
            if !self.preset.is_nonzero(&t.c) {
                continue;
            }
            assert!(t.tau_exps.len() <= GEN_CAP + 1 && t.xi_exps.len() <= GEN_CAP, "generator cap exceeded");
            let mut raw = Raw { c: t.c, tpow: t.tpow, e: [0; GEN_CAP + 1], r: [0; GEN_CAP] };
            // Powers are expanded by repeated multiplication to keep the
            // intermediate exponents within `u8`.
            let mut acc = AElement::from_mono(AMonomial::new(t.c, t.tpow, Pure::ONE));
            let mut pending_small = true;
            for (i, &x) in t.tau_exps.iter().enumerate() {
                if x > 2 {
                    pending_small = false;
                }
                raw.e[i] = x.min(255) as u8;
            }
            for (i, &x) in t.xi_exps.iter().enumerate() {
                if x > 200 {
                    pending_small = false;
                }
                raw.r[i] = x.min(255) as u8;
            }
            if pending_small {
                toggle_raw(&mut work, raw);
            } else {
                for (i, &x) in t.tau_exps.iter().enumerate() {
                    for _ in 0..x {
                        acc = self.mul(&acc, &self.tau_gen(i));
                    }
                }
                for (i, &x) in t.xi_exps.iter().enumerate() {
                    let p = AElement::from_pure(Pure::xi(i + 1, 1));
                    for _ in 0..x {
                        acc = self.mul(&acc, &p);
                    }
                }
                for m in acc.iter() {
                    toggle_raw(&mut work, Raw::from_mono(m));
                }
            }
        }
        self.reduce(work)
    }

    pub fn mul_mono(&self, a: &AMonomial, b: &AMonomial) -> AElement {
        let mut work = BTreeSet::new();
        if let Some(r) = self.raw_product(a, b) {
            work.insert(r);
        }
        self.reduce(work)
    }

    fn raw_product(&self, a: &AMonomial, b: &AMonomial) -> Option<Raw> {
        let c = self.preset.mono_mul(&a.c, &b.c)?;
        let mut e = [0u8; GEN_CAP + 1];
        for (i, x) in e.iter_mut().enumerate() {
            *x = ((a.pure.e >> i) & 1) + ((b.pure.e >> i) & 1);
        }
        let mut r = [0u8; GEN_CAP];
        for (i, x) in r.iter_mut().enumerate() {
            *x = a.pure.r[i].checked_add(b.pure.r[i]).expect("ξ exponent overflow");
        }
        Some(Raw { c, tpow: a.tpow + b.tpow, e, r })
    }

    /// The (commutative, associative) product of `A`.
    pub fn mul(&self, x: &AElement, y: &AElement) -> AElement {
        let mut work = BTreeSet::new();
        for a in x.iter() {
            for b in y.iter() {
                if let Some(r) = self.raw_product(a, b) {
                    toggle_raw(&mut work, r);
                }
            }
        }
        self.reduce(work)
    }

    pub fn pow(&self, x: &AElement, n: u32) -> AElement {
        let mut acc = AElement::one();
        for _ in 0..n {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// Left multiplication by a scalar monomial.
    pub fn scale_left(&self, s: &ScalarMono, x: &AElement) -> AElement {
        let mut out = AElement::zero();
        for m in x.iter() {
            if let Some(c) = self.preset.mono_mul(&s.c, &m.c) {
                out.toggle(AMonomial::new(c, m.tpow + s.tpow, m.pure));
            }
        }
        out
    }

    pub fn scale_left_by(&self, s: &Scalar, x: &AElement) -> AElement {
        let mut out = AElement::zero();
        for m in s.terms() {
            out.add_assign(&self.scale_left(m, x));
        }
        out
    }

    /// `η_R(τ)^k = (τ + ρτ_0)^k`.
    pub fn eta_r_tau_pow(&self, k: u16) -> AElement {
        let mut cache = self.eta_r_tau_powers.borrow_mut();
        while cache.len() <= k as usize {
            let base = self.tau().add(&self.mul(&self.rho_elt(), &self.tau_gen(0)));
            let next = self.mul(cache.last().unwrap(), &base);
            cache.push(next);
        }
        cache[k as usize].clone()
    }

    /// `x · η_R(s)`: right multiplication by a scalar.
    pub fn right_scale(&self, x: &AElement, s: &Scalar) -> AElement {
        let mut out = AElement::zero();
        for m in s.terms() {
            let eta = self.scale_left(&ScalarMono { c: m.c, tpow: 0 }, &self.eta_r_tau_pow(m.tpow));
            out.add_assign(&self.mul(x, &eta));
        }
        out
    }

    // ---- tensor products --------------------------------------------------------

    /// Writes `x = Σ m · η_R(s)` with `m` pure and `s = c τ^k`.
    pub fn to_right_form(&self, x: &AElement) -> BTreeSet<(Pure, ScalarMono)> {
        // Work items: (left monomial, accumulated right τ power).
        let mut work: BTreeSet<(AMonomial, u16)> = x.iter().map(|m| (*m, 0)).collect();
        let mut out: BTreeSet<(Pure, ScalarMono)> = BTreeSet::new();
        let tau0 = AMonomial::pure(Pure::tau(0));
        while let Some((m, j)) = work.pop_last() {
            if m.tpow == 0 {
                let key = (m.pure, ScalarMono { c: m.c, tpow: j });
                if !out.remove(&key) {
                    out.insert(key);
                }
                continue;
            }
            // c τ^k m = (c τ^{k-1} m) η_R(τ) + ρ c τ^{k-1} τ_0 m
            let lowered = AMonomial::new(m.c, m.tpow - 1, m.pure);
            toggle_pair(&mut work, (lowered, j + 1));
            if let Some(rho) = self.rho {
                if let Some(c) = self.preset.mono_mul(&m.c, &rho) {
                    let base = AMonomial::new(c, m.tpow - 1, m.pure);
                    for t in self.mul_mono(&base, &tau0).iter() {
                        toggle_pair(&mut work, (*t, j));
                    }
                }
            }
        }
        out
    }

    /// `x ⊗ y` in normalized form.
    pub fn tensor(&self, x: &AElement, y: &AElement) -> TensorElement {
        let mut out = TensorElement::zero();
        for (n, s) in self.to_right_form(x) {
            for m in self.scale_left(&s, y).iter() {
                out.toggle((n, *m));
            }
        }
        out
    }

    pub fn tensor_mul(&self, x: &TensorElement, y: &TensorElement) -> TensorElement {
        // Group by left factors to limit the number of right products.
        let mut acc: BTreeMap<Pure, AElement> = BTreeMap::new();
        let mut left_prod: BTreeMap<(Pure, Pure), AElement> = BTreeMap::new();
        for (m1, a) in x.iter() {
            for (m2, b) in y.iter() {
                let key = if m1 <= m2 { (*m1, *m2) } else { (*m2, *m1) };
                let lp = left_prod
                    .entry(key)
                    .or_insert_with(|| self.mul(&AElement::from_pure(*m1), &AElement::from_pure(*m2)))
                    .clone();
                let rp = self.mul_mono(a, b);
                for (n, s) in self.to_right_form(&lp) {
                    let e = acc.entry(n).or_default();
                    e.add_assign(&self.scale_left(&s, &rp));
                }
            }
        }
        let mut out = TensorElement::zero();
        for (n, e) in acc {
            for m in e.iter() {
                out.toggle((n, *m));
            }
        }
        out
    }

    fn generator_coproduct(&self, g: Pure) -> TensorElement {
        let mut t = TensorElement::zero();
        let one = AMonomial::pure(Pure::ONE);
        if let Some(r) = (0..=GEN_CAP).find(|&i| g.has_tau(i)) {
            t.toggle((Pure::tau(r), one));
            t.toggle((Pure::ONE, AMonomial::pure(Pure::tau(r))));
            for i in 0..r {
                t.toggle((Pure::xi(r - i, 1 << i), AMonomial::pure(Pure::tau(i))));
            }
        } else {
            let r = (1..=GEN_CAP).find(|&i| g.xi_exp(i) == 1).expect("generator");
            t.toggle((Pure::xi(r, 1), one));
            t.toggle((Pure::ONE, AMonomial::pure(Pure::xi(r, 1))));
            for i in 1..r {
                t.toggle((Pure::xi(r - i, 1 << i), AMonomial::pure(Pure::xi(i, 1))));
            }
        }
        t
    }

    /// `Δ` on a pure monomial (memoized).
    pub fn coproduct_pure(&self, p: Pure) -> Rc<TensorElement> {
        if let Some(t) = self.coproducts.borrow().get(&p) {
            return t.clone();
        }
        let t = match p.split_first() {
            None => {
                let mut t = TensorElement::zero();
                t.toggle((Pure::ONE, AMonomial::pure(Pure::ONE)));
                t
            }
            Some((g, rest)) if rest.is_one() => self.generator_coproduct(g),
            Some((g, rest)) => {
                let a = self.coproduct_pure(g);
                let b = self.coproduct_pure(rest);
                self.tensor_mul(&a, &b)
            }
        };
        let t = Rc::new(t);
        self.coproducts.borrow_mut().insert(p, t.clone());
        t
    }

    /// The diagonal `Δ: A → A ⊗_{H**} A`.
    pub fn coproduct(&self, x: &AElement) -> TensorElement {
        let mut acc: BTreeMap<Pure, AElement> = BTreeMap::new();
        for m in x.iter() {
            let dp = self.coproduct_pure(m.pure);
            let s = m.scalar();
            for (n, a) in dp.iter() {
                // (c τ^k) · (n ⊗ a)
                let left = AElement::from_mono(AMonomial::new(s.c, s.tpow, *n));
                for (n2, s2) in self.to_right_form(&left) {
                    let e = acc.entry(n2).or_default();
                    e.add_assign(&self.scale_left(&s2, &AElement::from_mono(*a)));
                }
            }
        }
        let mut out = TensorElement::zero();
        for (n, e) in acc {
            for m in e.iter() {
                out.toggle((n, *m));
            }
        }
        out
    }

    /// `(Δ ⊗ id) Δ(x)`.
    pub fn coassoc_left(&self, x: &AElement) -> TripleTensor {
        let mut out = TripleTensor::new();
        for (m1, a) in self.coproduct(x).iter() {
            for (n1, b) in self.coproduct_pure(*m1).iter() {
                for (n2, a2) in self.tensor(&AElement::from_mono(*b), &AElement::from_mono(*a)).iter() {
                    toggle_triple(&mut out, (*n1, *n2, *a2));
                }
            }
        }
        out
    }

    /// `(id ⊗ Δ) Δ(x)`.
    pub fn coassoc_right(&self, x: &AElement) -> TripleTensor {
        let mut out = TripleTensor::new();
        for (m1, a) in self.coproduct(x).iter() {
            for (n2, a2) in self.coproduct(&AElement::from_mono(*a)).iter() {
                toggle_triple(&mut out, (*m1, *n2, *a2));
            }
        }
        out
    }

    /// `(ε ⊗ id) Δ(x)`.
    pub fn counit_left(&self, t: &TensorElement) -> AElement {
        t.iter().filter(|(m, _)| m.is_one()).map(|(_, a)| *a).collect()
    }

    /// `(id ⊗ ε) Δ(x)`.
    pub fn counit_right(&self, t: &TensorElement) -> AElement {
        let mut out = AElement::zero();
        for (m, a) in t.iter() {
            if a.pure.is_one() {
                out.add_assign(&self.right_scale(&AElement::from_pure(*m), &Scalar::mono(a.scalar())));
            }
        }
        out
    }

    // ---- conjugation -------------------------------------------------------------

    fn generator_conjugate(&self, g: Pure) -> AElement {
        let mut out = AElement::from_pure(g);
        if let Some(r) = (0..=GEN_CAP).find(|&i| g.has_tau(i)) {
            for i in 0..r {
                let x = AElement::from_pure(Pure::xi(r - i, 1 << i));
                out.add_assign(&self.mul(&x, &self.conjugate_pure(Pure::tau(i))));
            }
        } else {
            let r = (1..=GEN_CAP).find(|&i| g.xi_exp(i) == 1).expect("generator");
            for i in 1..r {
                let x = AElement::from_pure(Pure::xi(r - i, 1 << i));
                out.add_assign(&self.mul(&x, &self.conjugate_pure(Pure::xi(i, 1))));
            }
        }
        out
    }

    pub fn conjugate_pure(&self, p: Pure) -> Rc<AElement> {
        if let Some(t) = self.conjugates.borrow().get(&p) {
            return t.clone();
        }
        let x = match p.split_first() {
            None => AElement::one(),
            Some((g, rest)) if rest.is_one() => self.generator_conjugate(g),
            Some((g, rest)) => {
                let a = self.conjugate_pure(g);
                let b = self.conjugate_pure(rest);
                self.mul(&a, &b)
            }
        };
        let x = Rc::new(x);
        self.conjugates.borrow_mut().insert(p, x.clone());
        x
    }

    /// The conjugation `ι`, a ring map with `ι(s) = η_R(s)` on coefficients.
    pub fn conjugate(&self, x: &AElement) -> AElement {
        let mut out = AElement::zero();
        for m in x.iter() {
            let cp = self.conjugate_pure(m.pure);
            let s = Scalar::mono(m.scalar());
            out.add_assign(&self.right_scale(&cp, &s));
        }
        out
    }

    /// `ξ̄_i^n`.
    pub fn xi_bar_pow(&self, i: usize, n: u8) -> Rc<AElement> {
        self.conjugate_pure(Pure::xi(i, n))
    }

    // ---- pairing and actions ------------------------------------------------------

    /// Left coefficient of the pure basis monomial `m0` in `x`.
    pub fn kronecker(&self, m0: Pure, x: &AElement) -> Scalar {
        let mut s = Scalar::zero();
        for m in x.iter().filter(|m| m.pure == m0) {
            s.toggle(m.scalar());
        }
        s
    }

    /// The action on a pure monomial (memoized).
    pub fn act_pure(&self, op: SteenrodOp, side: Side, p: Pure) -> Rc<AElement> {
        let key = (op, side, p);
        if let Some(v) = self.actions.borrow().get(&key) {
            return v.clone();
        }
        let v = Rc::new(self.act_direct(op, side, &AElement::from_pure(p)));
        self.actions.borrow_mut().insert(key, v.clone());
        v
    }

    /// Same as [`act_direct`](Self::act_direct), using that the right action
    /// is left `H**`-linear and the left action is right `H**`-linear.
    pub fn act(&self, op: SteenrodOp, side: Side, x: &AElement) -> AElement {
        let mut out = AElement::zero();
        match side {
            Side::Right => {
                let mut by_pure: BTreeMap<Pure, Scalar> = BTreeMap::new();
                for m in x.iter() {
                    by_pure.entry(m.pure).or_default().toggle(m.scalar());
                }
                for (p, s) in by_pure {
                    out.add_assign(&self.scale_left_by(&s, &self.act_pure(op, side, p)));
                }
            }
            Side::Left => {
                let mut by_pure: BTreeMap<Pure, Scalar> = BTreeMap::new();
                for (p, s) in self.to_right_form(x) {
                    by_pure.entry(p).or_default().toggle(s);
                }
                for (p, s) in by_pure {
                    out.add_assign(&self.right_scale(&self.act_pure(op, side, p), &s));
                }
            }
        }
        out
    }

    /// `α^R_*(x) = Σ x' ⟨α, x''⟩` and `α^L_*(x) = Σ ⟨α, ι(x')⟩ x''`.
    pub fn act_direct(&self, op: SteenrodOp, side: Side, x: &AElement) -> AElement {
        let m0 = op.dual_monomial();
        let delta = self.coproduct(x);
        let mut out = AElement::zero();
        match side {
            Side::Right => {
                let mut by_left: BTreeMap<Pure, Scalar> = BTreeMap::new();
                for (m1, a) in delta.iter() {
                    if a.pure == m0 {
                        by_left.entry(*m1).or_default().toggle(a.scalar());
                    }
                }
                for (m1, s) in by_left {
                    out.add_assign(&self.right_scale(&AElement::from_pure(m1), &s));
                }
            }
            Side::Left => {
                for (m1, a) in delta.iter() {
                    let s = self.kronecker(m0, &self.conjugate_pure(*m1));
                    if !s.is_zero() {
                        out.add_assign(&self.scale_left_by(&s, &AElement::from_mono(*a)));
                    }
                }
            }
        }
        out
    }

    // ---- bases --------------------------------------------------------------------

    /// Pure monomials of bidegree `b`.
    pub fn pure_basis(&self, b: Bidegree) -> Rc<Vec<Pure>> {
        if let Some(v) = self.pure_bases.borrow().get(&b) {
            return v.clone();
        }
        let mut out = Vec::new();
        if b.q >= 0 && b.p - 2 * b.q >= 0 {
            assert!(b.q < CAP_WEIGHT, "weight {} exceeds the generator cap", b.q);
            fill_pure(0, b.p, b.q, Pure::ONE, &mut out);
        }
        out.sort();
        let v = Rc::new(out);
        self.pure_bases.borrow_mut().insert(b, v.clone());
        v
    }

    /// All normal-form monomials of bidegree `b`, in canonical order.
    pub fn basis(&self, b: Bidegree) -> Vec<AMonomial> {
        let mut out = Vec::new();
        let excess = b.p - 2 * b.q;
        if excess < 0 {
            return out;
        }
        for d in 0..=excess as u32 {
            for c in self.preset.km_basis(d) {
                let mut k = 0i32;
                while d as i32 + 2 * k <= excess {
                    let pb = Bidegree::new(b.p + d as i32, b.q + d as i32 + k);
                    for p in self.pure_basis(pb).iter() {
                        out.push(AMonomial::new(c, k as u16, *p));
                    }
                    k += 1;
                }
            }
        }
        out.sort();
        out
    }

    // ---- formatting ------------------------------------------------------------

    pub fn format_scalar_mono(&self, s: &ScalarMono) -> String {
        let mut parts = Vec::new();
        if !s.c.is_one() {
            parts.push(self.preset.format_km(&s.c));
        }
        match s.tpow {
            0 => {}
            1 => parts.push("tau".into()),
            k => parts.push(alloc::format!("tau^{k}")),
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn format_scalar(&self, s: &Scalar) -> String {
        if s.is_zero() {
            return "0".into();
        }
        s.terms().map(|m| self.format_scalar_mono(m)).collect::<Vec<_>>().join(" + ")
    }

    pub fn format_mono(&self, m: &AMonomial) -> String {
        let mut parts = Vec::new();
        let s = m.scalar();
        if s != ScalarMono::ONE {
            parts.push(self.format_scalar_mono(&s));
        }
        parts.push(format_pure(&m.pure));
        parts.retain(|p| p != "1");
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn format(&self, x: &AElement) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.iter().map(|m| self.format_mono(m)).collect::<Vec<_>>().join(" + ")
    }
}

pub fn format_pure(p: &Pure) -> String {
    let mut parts = Vec::new();
    for i in 0..=GEN_CAP {
        if p.has_tau(i) {
            parts.push(alloc::format!("t{i}"));
        }
    }
    for i in 1..=GEN_CAP {
        match p.xi_exp(i) {
            0 => {}
            1 => parts.push(alloc::format!("x{i}")),
            e => parts.push(alloc::format!("x{i}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn toggle_raw(set: &mut BTreeSet<Raw>, r: Raw) {
    if !set.remove(&r) {
        set.insert(r);
    }
}

fn toggle_pair(set: &mut BTreeSet<(AMonomial, u16)>, r: (AMonomial, u16)) {
    if !set.remove(&r) {
        set.insert(r);
    }
}

fn toggle_triple(set: &mut TripleTensor, r: (Pure, Pure, AMonomial)) {
    if !set.remove(&r) {
        set.insert(r);
    }
}

// Generators in order τ_0..τ_CAP, ξ_1..ξ_CAP; slot index g.
fn fill_pure(g: usize, p: i32, q: i32, cur: Pure, out: &mut Vec<Pure>) {
    if p == 0 && q == 0 {
        out.push(cur);
        return;
    }
    if g > 2 * GEN_CAP || p < 0 || q < 0 || p - 2 * q < 0 {
        return;
    }
    if g <= GEN_CAP {
        let i = g;
        fill_pure(g + 1, p, q, cur, out);
        let d = Bidegree::tau_i(i);
        if d.q <= q && d.p <= p {
            let mut next = cur;
            next.e |= 1 << i;
            fill_pure(g + 1, p - d.p, q - d.q, next, out);
        }
    } else {
        let i = g - GEN_CAP;
        let d = Bidegree::xi_i(i);
        let mut k = 0;
        let mut next = cur;
        loop {
            let (pp, qq) = (p - d.p * k, q - d.q * k);
            if pp < 0 || qq < 0 {
                break;
            }
            next.r[i - 1] = k as u8;
            fill_pure(g + 1, pp, qq, next, out);
            k += 1;
            if k > 255 {
                break;
            }
        }
    }
}
